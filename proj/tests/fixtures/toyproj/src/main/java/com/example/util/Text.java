package com.example.util;

public class Text {
    public static String capitalize(String s) {
        if (s == null || s.isEmpty()) {
            return s;
        }
        String head = s.substring(0, 1).toUpperCase();
        return head + s.substring(1);
    }

    public static String repeat(String s, int n) {
        StringBuilder out = new StringBuilder();
        for (int i = 0; i < n; i++) {
            out.append(s);
        }
        return out.toString();
    }

    static class Cache {
        private String last;

        String remember(String value) {
            last = value;
            return last;
        }
    }
}
