import sys

from mlosim.cli import main

sys.exit(main())
