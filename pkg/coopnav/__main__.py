import sys

from coopnav.cli import main

sys.exit(main())
