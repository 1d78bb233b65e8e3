int main() {
    int i = 0;
    while (i < 10)
        i++;
    MYASSERT(i == 10);
    return i;
}
