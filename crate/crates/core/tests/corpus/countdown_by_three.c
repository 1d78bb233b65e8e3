int main() {
    int x;
    while (x > 0)
        x -= 3;
    return x;
}
