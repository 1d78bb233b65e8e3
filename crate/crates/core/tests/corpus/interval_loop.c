int main() {
    int a = 5;
    int b = 2;
    while (a > 0) {
        a = a - 1;
        b = b * 1;
    }
    return a + b;
}
