from .expcli import main
import sys

sys.exit(main())
