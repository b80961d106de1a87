"""Exits with the status given as the third argument (default 1)."""
import sys

print("stub failure", file=sys.stderr)
sys.exit(int(sys.argv[3]) if len(sys.argv) > 3 else 1)
