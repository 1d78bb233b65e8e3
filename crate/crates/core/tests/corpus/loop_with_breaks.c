int main() {
    int x;
    int i = 0;
    while (1) {
        if (i >= x)
            break;
        i++;
        if (i > 6)
            break;
    }
    MYASSERT(i <= 7);
    return i;
}
