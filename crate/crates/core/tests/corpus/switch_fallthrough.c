int main() {
    int x;
    int y = 0;
    switch (x) {
    case 1:
        y = 10;
        break;
    case 2:
        y = 20;
    case 3:
        y += 1;
        break;
    default:
        y = -1;
    }
    return y;
}
