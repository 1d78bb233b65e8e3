int main() {
    unsigned int u;
    unsigned int v = u - 1;
    int small = v < 3;
    return small;
}
