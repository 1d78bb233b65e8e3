int main() {
    int x;
    int y = x > 0 ? x : -x;
    MYASSERT(y >= 0);
    return y;
}
