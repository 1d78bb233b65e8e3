int main() {
    int x;
    int y;
    int z = 100 / x;
    return z + y % 3;
}
