import sys

from gndopt.cli import main

sys.exit(main())
