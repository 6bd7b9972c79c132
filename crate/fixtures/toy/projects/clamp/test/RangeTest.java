public class RangeTest {
    void testInside() {
        assertEquals(5, clamp(5, 0, 10));
    }
    void testBelow() {
        assertEquals(0, clamp(-3, 0, 10));
    }
    void testAbove() {
        assertEquals(10, clamp(12, 0, 10));
    }
}
