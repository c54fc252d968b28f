# Test package for qchain
