panic
