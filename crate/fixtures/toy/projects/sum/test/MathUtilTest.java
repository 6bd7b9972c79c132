public class MathUtilTest {
    void testSmall() {
        assertEquals(6, sumTo(3));
        assertEquals(1, sumTo(1));
    }
    void testEmpty() {
        assertEquals(0, sumTo(0));
        assertEquals(0, sumTo(-4));
    }
}
