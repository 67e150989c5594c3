import sys

from postocr.harness.cli import main

sys.exit(main())
