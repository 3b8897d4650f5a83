int classify(int a, int b, int c)
{
    if (a > 0) {
        if (b > 0) {
            if (c > 0) {
                return 3;
            }
        }
    }
    if (a < b) {
        return 1;
    } else if (a > b) {
        return 2;
    }
    return 0;
}
