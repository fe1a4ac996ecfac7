"""
Entry point for the partial-diffusion search command line.
"""
from src.cli import main

if __name__ == "__main__":
    main()
