import sys

from meterread.cli import main

sys.exit(main())
