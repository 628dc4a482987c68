import sys
from pathlib import Path

# Make the shared synthetic-fixture helpers importable as `synth`.
sys.path.insert(0, str(Path(__file__).parent))
