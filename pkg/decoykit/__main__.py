import sys

from decoykit.cli import main

sys.exit(main())
