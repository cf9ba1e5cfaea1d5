import sys

from kcost.lab.cli import main

sys.exit(main())
