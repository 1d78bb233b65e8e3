int main() {
    int s = 0;
    for (int i = 0; i < 5; i++)
        s += 2;
    MYASSERT(s >= 0);
    return s;
}
