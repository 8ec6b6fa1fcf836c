"""
O-information toolkit - command-line entry point.
Run `python app.py --help` for the available commands.
"""
from frontend.cli import main

if __name__ == "__main__":
    main()
