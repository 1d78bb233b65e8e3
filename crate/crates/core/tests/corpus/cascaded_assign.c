int main() {
    int x;
    int a = 0;
    int b = 0;
    a = b = x + 1;
    MYASSERT(a == b);
    return a - b;
}
