int main() {
    char c;
    int i = c;
    c += 100;
    return c + i;
}
