int main() {
    int s = 0;
    int i = 1;
    while (i <= 8) {
        s = s + i * i;
        i++;
    }
    return s;
}
