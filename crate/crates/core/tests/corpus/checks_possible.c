int main() {
    int c;
    int y = 0;
    if (c > 0)
        y = 1;
    else if (c < 0)
        y = -1;
    int x = 1 / y;
    return x;
}
