int main() {
    long a;
    long b = a * 1000000;
    int pos = b > 0;
    return pos;
}
