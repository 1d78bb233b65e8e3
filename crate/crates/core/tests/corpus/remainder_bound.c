int main() {
    int x;
    int r = x % 4;
    MYASSERT(r < 4);
    MYASSERT(r > -4);
    return r;
}
