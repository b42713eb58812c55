package com.example;

public class TimeOfDay {
    public int hour;
    public int minute;

    public TimeOfDay(int hour, int minute) {
        this.hour = hour;
        this.minute = minute;
    }

    public boolean isValid() {
        return hour >= 0 && hour < 24 && minute >= 0 && minute < 60;
    }

    public String label() {
        String text = hour + ":" + minute;
        return text;
    }
}
