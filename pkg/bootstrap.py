"""Creates a virtual environment for developing StochasticVlasov.

Installs the development dependencies and the library itself in editable
mode, so that ``stochvlasov`` and ``inv utest`` work from the checkout.
"""
import platform
import subprocess
from pathlib import Path
from venv import EnvBuilder

venv_dir = Path(".") / ".venv"
windows = platform.platform().startswith("Windows")
venv_python = venv_dir / ("Scripts/python.exe" if windows else "bin/python")
requirements = Path(".") / "StochasticVlasov" / "dev-requirements.txt"

if not venv_dir.exists():
    print(f"Creating virtualenv in {venv_dir}")
    EnvBuilder(with_pip=True).create(venv_dir)

subprocess.run([venv_python, "-m", "pip", "install", "-r", str(requirements)], check=True)
subprocess.run([venv_python, "-m", "pip", "install", "-e", "."], check=True)

activate_script = ".venv\\Scripts\\activate.bat" if windows else "source .venv/bin/activate"
print(f"Virtualenv `{venv_dir}` is ready and up-to-date.")
print(f"Run `{activate_script}` to activate the virtualenv.")
