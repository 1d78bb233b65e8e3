int main() {
    int n;
    int i = 0;
    int j = 0;
    while (i < n) {
        i++;
        j++;
    }
    MYASSERT(i == j);
    return j;
}
