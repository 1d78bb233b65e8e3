int main() {
    int x;
    int y;
    int z = 0;
    if (x > y) {
        if (x > 0)
            z = 1;
        else
            z = 2;
    } else {
        z = 3;
    }
    MYASSERT(z > 0);
    return z;
}
