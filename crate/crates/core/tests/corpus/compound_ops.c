int main() {
    int x;
    int y = 3;
    y *= x;
    y -= 2;
    y += x;
    y /= 2;
    return y;
}
