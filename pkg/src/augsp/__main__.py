import sys

from augsp.cli import main

sys.exit(main())
