"""Core library: field arithmetic, integral bases, enumeration, densities and the main term."""
