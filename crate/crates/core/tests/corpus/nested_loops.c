int main() {
    int i = 0;
    int j;
    int s = 0;
    while (i < 4) {
        j = 0;
        while (j < i) {
            s += j;
            j++;
        }
        i++;
    }
    return s;
}
