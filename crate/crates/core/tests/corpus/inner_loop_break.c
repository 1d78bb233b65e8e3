int main() {
    int i = 0;
    int t = 0;
    while (i < 5) {
        int j = 0;
        while (1) {
            if (j >= i)
                break;
            j++;
            t++;
        }
        i++;
    }
    return t;
}
