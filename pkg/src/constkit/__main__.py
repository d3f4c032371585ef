import sys

from constkit.cli import main

sys.exit(main())
