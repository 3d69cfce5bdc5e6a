import sys

from probrep.cli import main

sys.exit(main())
