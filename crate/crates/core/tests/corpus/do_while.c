int main() {
    int x;
    int c = 0;
    do {
        x--;
        c++;
    } while (x > 0);
    return c + x;
}
