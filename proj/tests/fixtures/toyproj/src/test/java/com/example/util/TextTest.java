package com.example.util;

import org.junit.Test;

public class TextTest {
    @Test
    public void testCapitalize() {
        assertEquals("Word", Text.capitalize("word"));
        assertEquals(null, Text.capitalize(null));
    }

    @Test
    public void testRepeat() {
        assertEquals("ababab", Text.repeat("ab", 3));
        assertEquals("x", new Text.Cache().remember("x"));
    }
}
