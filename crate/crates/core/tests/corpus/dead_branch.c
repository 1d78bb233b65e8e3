int main() {
    int x = 3;
    int y = 0;
    if (x > 5) {
        y = 7;
        MYASSERT(y == 0);
    }
    MYASSERT(y == 0);
    return y;
}
