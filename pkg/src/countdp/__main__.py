import sys

from countdp.cli import main

sys.exit(main())
