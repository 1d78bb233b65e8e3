int main() {
    int x;
    int y;
    if (x > 0)
        y = 10;
    else
        y = -10;
    x = y * 10;
    return x;
}
