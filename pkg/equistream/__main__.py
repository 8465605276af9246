import sys

from equistream.cli import main

sys.exit(main())
