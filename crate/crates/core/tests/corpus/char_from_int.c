int main() {
    int x;
    char c = x;
    int r = c * 2;
    return r;
}
