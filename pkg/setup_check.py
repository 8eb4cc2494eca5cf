import sys
import subprocess
import importlib.util

MIN_PYTHON = (3, 10)

REQUIRED_PACKAGES = {
    "numpy": "numpy",
    "tqdm": "tqdm",
}

# 只有运行测试时需要
TEST_PACKAGES = {
    "pytest": "pytest",
    "hypothesis": "hypothesis",
    "sympy": "sympy",
}


def check_python():
    print(f"Checking Python >= {MIN_PYTHON[0]}.{MIN_PYTHON[1]}...", end=" ")
    if sys.version_info[:2] >= MIN_PYTHON:
        print("OK")
        return True
    print(f"TOO OLD ({sys.version.split()[0]})")
    return False


def check_package(package_name):
    print(f"Checking {package_name}...", end=" ")
    if importlib.util.find_spec(package_name):
        print("OK")
        return True
    print("MISSING")
    return False


def install_package(install_name):
    print(f"Installing {install_name}...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", install_name])
        print(f"Successfully installed {install_name}")
        return True
    except subprocess.CalledProcessError:
        print(f"Failed to install {install_name}")
        return False


def main():
    print("=== FlatRank Environment Check ===")
    if not check_python():
        print("FlatRank needs Python 3.10+ (int.bit_count, math.lcm with many arguments).")
        sys.exit(1)

    with_tests = "--tests" in sys.argv[1:]
    packages = dict(REQUIRED_PACKAGES)
    if with_tests:
        packages.update(TEST_PACKAGES)

    missing_packages = [install for name, install in packages.items() if not check_package(name)]

    if missing_packages:
        print("\nMissing dependencies detected.")
        choice = input(f"Do you want to try installing missing packages? ({', '.join(missing_packages)}) [Y/n]: ").strip().lower()
        if choice in ['', 'y', 'yes']:
            for pkg in missing_packages:
                if not install_package(pkg):
                    print("Error: Installation failed. Please check your internet connection or try manually.")
                    sys.exit(1)
            print("\nAll dependencies installed successfully!")
        else:
            print("Please install missing packages manually to run FlatRank.")
            sys.exit(1)
    else:
        print("\nEnvironment is ready!")
        if not with_tests:
            print("Run `python setup_check.py --tests` to also check the test dependencies.")


if __name__ == "__main__":
    main()
