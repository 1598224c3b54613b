import sys

from pminimal.cli import main

sys.exit(main())
