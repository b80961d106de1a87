import sys

from sumscore.cli import main

sys.exit(main())
