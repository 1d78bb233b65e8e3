int main() {
    int x;
    int y = 0;
    if (x < 0)
        goto done;
    y = x * 2;
done:
    return y;
}
