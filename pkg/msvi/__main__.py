import sys

from msvi.main import main

sys.exit(main())
