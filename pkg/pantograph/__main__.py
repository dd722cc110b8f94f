import sys

from pantograph.cli import main

sys.exit(main())
