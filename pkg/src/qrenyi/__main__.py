import sys

from qrenyi.cli import main

sys.exit(main())
