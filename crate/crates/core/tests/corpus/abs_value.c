int main() {
    int x;
    int y;
    if (x < 0)
        y = -x;
    else
        y = x;
    MYASSERT(y >= 0);
    return y;
}
