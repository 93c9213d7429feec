import sys

from aidist.sim.cli import main

sys.exit(main())
