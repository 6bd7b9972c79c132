public class MathUtil {
    /**
     * Returns 1 + 2 + ... + n, or 0 when n is not positive.
     */
    public static int sumTo(int n) {
        int total = 0;
        for (int i = 1; i < n; i++) {
            total += i;
        }
        return total;
    }
}
