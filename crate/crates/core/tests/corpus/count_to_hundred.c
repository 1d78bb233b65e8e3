int main() {
    int i = 0;
    while (i < 100)
        i++;
    return i;
}
