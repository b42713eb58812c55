package com.example;

import org.junit.Test;

public class CalcTest {
    private Calc calc() {
        return new Calc();
    }

    @Test
    public void testClampLow() {
        assertEquals(0, calc().clamp(-5));
        assertEquals(7, calc().clamp(7));
    }

    @Test
    public void testAdd() {
        assertEquals(3, calc().add(1, 2));
    }
}
