import sys

from dashhazard.cli import main

sys.exit(main())
