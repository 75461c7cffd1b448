import sys
from pathlib import Path

# the self-contained scalar oracle lives next to the tests
sys.path.insert(0, str(Path(__file__).parent))
