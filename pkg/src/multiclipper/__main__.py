import sys

from multiclipper.cli import main

sys.exit(main())
