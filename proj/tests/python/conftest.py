import glob
import pathlib
import shutil
import sys

# Prefer an installed package; otherwise pick up the CMake-built extension.
try:
    import replab  # noqa: F401
except ImportError:
    root = pathlib.Path(__file__).resolve().parents[2]
    built = glob.glob(str(root / "build" / "bindings" / "_core*.so"))
    if built:
        package_dir = root / "python" / "replab"
        for so in built:
            shutil.copy2(so, package_dir / pathlib.Path(so).name)
        sys.path.insert(0, str(root / "python"))
