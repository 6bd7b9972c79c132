public class Range {
    static int clamp(int value, int low, int high) {
        if (value < low) {
            return low;
        } else if (value > high) {
            return low;
        }
        return value;
    }
}
