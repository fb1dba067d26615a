import os
import re
import shutil
import subprocess
import sys
import traceback
from pathlib import Path
from typing import Iterable

from invoke import Exit, task

try:
    import pytest
    from robot import rebot_cli
    from robot.libdoc import libdoc
except ModuleNotFoundError:
    traceback.print_exc()
    print('Assuming that this is for "inv deps" command and ignoring error.')

ROOT_DIR = Path(os.path.dirname(__file__))
ATEST_OUTPUT = ROOT_DIR / "atest" / "output"
UTEST_OUTPUT = ROOT_DIR / "utest" / "output"
dist_dir = ROOT_DIR / "dist"
build_dir = ROOT_DIR / "build"
PYTHON_SRC_DIR = ROOT_DIR / "StochasticVlasov"
python_deps_timestamp_file = PYTHON_SRC_DIR / ".installed"
python_lint_timestamp_file = PYTHON_SRC_DIR / ".linted"
ATEST_TIMEOUT = 3600
VERSION_PATH = PYTHON_SRC_DIR / "version.py"


@task
def deps(c):
    if _sources_changed(
        [PYTHON_SRC_DIR / "dev-requirements.txt"], python_deps_timestamp_file
    ):
        c.run("pip install -U pip")
        c.run("pip install -r StochasticVlasov/dev-requirements.txt")
        python_deps_timestamp_file.touch()
    else:
        print("no changes in StochasticVlasov/dev-requirements.txt, skipping pip install")


@task
def clean(c):
    for target in [
        dist_dir,
        build_dir,
        UTEST_OUTPUT,
        Path("./htmlcov"),
        ATEST_OUTPUT,
        Path("./.mypy_cache"),
        Path("./results"),
    ]:
        if target.exists():
            shutil.rmtree(target)
    for file in [
        python_lint_timestamp_file,
        python_deps_timestamp_file,
        Path("./.coverage"),
    ]:
        try:
            file.unlink()
        except OSError:
            pass


def _sources_changed(source_files: Iterable[Path], timestamp_file: Path):
    if timestamp_file.exists():
        last_built = timestamp_file.lstat().st_mtime
        src_last_modified = [f.lstat().st_mtime for f in source_files]
        return not all([last_built >= modified for modified in src_last_modified])
    return True


@task
def utest(c, reporter=None, suite=None):
    """Run utest.

    Args:
        reporter: Defines which approval test reporter to use.
                  Must be full path to the diff program.
                  For more details see:
                  https://pypi.org/project/pytest-approvaltests/
                  https://github.com/approvals/ApprovalTests.Python
        suite:    Defines which test suite file to run. Same as: pytest path/to/test.py
                  Must be path to the test suite file

    To create coverage use: coverage run -m invoke utest
    """
    args = ["--showlocals", "--junitxml=utest/output/pytest_xunit.xml", "--tb=long"]
    if reporter:
        args.append(f"--approvaltests-add-reporter={reporter}")
    if suite:
        args.append(suite)
    status = pytest.main(args)
    raise Exit(status)


@task
def utest_watch(c):
    c.run("ptw --ignore ./.venv")


@task
def clean_atest(c):
    if ATEST_OUTPUT.exists():
        shutil.rmtree(ATEST_OUTPUT)


@task(clean_atest)
def atest(c, suite=None, include=None, smoke=False):
    """Run acceptance tests with Robot Framework.

    Args:
        suite: Select which suite to run.
        include: Select test by tag
        smoke: If true, skips tests tagged ``slow``.
    """
    os.environ["ROBOT_SYSLOG_FILE"] = str(ATEST_OUTPUT / "syslog.txt")
    os.environ["STOCHVLASOV_OUTPUT_DIR"] = str(ATEST_OUTPUT / "results")
    command_args = [
        sys.executable,
        "-m",
        "robot",
        "--pythonpath",
        ".",
        "--loglevel",
        "DEBUG",
        "--xunit",
        "robot_xunit.xml",
        "--outputdir",
        str(ATEST_OUTPUT),
    ]
    if suite:
        command_args.extend(["--suite", suite])
    if include:
        command_args.extend(["--include", include])
    if smoke:
        command_args.extend(["--exclude", "slow"])
    command_args.append("atest/test")
    process = subprocess.Popen(command_args, env=os.environ.copy())
    process.wait(ATEST_TIMEOUT)
    output_xml = str(ATEST_OUTPUT / "output.xml")
    rc = rebot_cli(["--outputdir", str(ATEST_OUTPUT), output_xml], exit=False)
    print(f"DONE rc=({rc})")
    sys.exit(rc)


@task
def lint_python(c):
    all_py_sources = list(PYTHON_SRC_DIR.glob("**/*.py")) + list(
        (ROOT_DIR / "utest").glob("**/*.py")
    )
    if _sources_changed(all_py_sources, python_lint_timestamp_file):
        c.run(
            "mypy --show-error-codes --config-file StochasticVlasov/mypy.ini StochasticVlasov/ utest/"
        )
        c.run("black --config StochasticVlasov/pyproject.toml tasks.py StochasticVlasov/")
        c.run("flake8 --config StochasticVlasov/.flake8 StochasticVlasov/ utest/")
        c.run("isort StochasticVlasov/")
        python_lint_timestamp_file.touch()
    else:
        print("no changes in .py files, skipping python lint")


@task
def lint_robot(c):
    in_ci = os.getenv("GITHUB_WORKFLOW")
    print(f"Lint Robot files {'in ci' if in_ci else ''}")
    command = [
        "robotidy",
        "--lineseparator",
        "unix",
        "--configure",
        "NormalizeAssignments:equal_sign_type=space_and_equal_sign",
        "--configure",
        "NormalizeNewLines:section_lines=1",
    ]
    if in_ci:
        command.insert(1, "--check")
        command.insert(1, "--diff")
    for file in Path("atest/test/").glob("*"):
        c.run(" ".join([*command, str(file)]))


@task(lint_python, lint_robot)
def lint(c):
    pass


@task
def docs(c, version=None):
    """Generate library keyword documentation.

    Args:
        version: Creates keyword documentation with version
        suffix in the name. Documentation is moved to docs/versions
        folder.
    """
    output = ROOT_DIR / "docs" / "StochasticVlasov.html"
    output.parent.mkdir(exist_ok=True)
    libdoc("StochasticVlasov", str(output))
    if version is not None:
        target = ROOT_DIR / "docs" / "versions" / f"StochasticVlasov-{version.replace('v', '')}.html"
        target.parent.mkdir(exist_ok=True)
        output.rename(target)


@task
def create_package(c):
    c.run("python setup.py sdist bdist_wheel")


@task(clean, docs, create_package)
def package(c):
    pass


@task()
def version(c, version):
    if not version:
        print("Give version with inv version <version>")
    py_version_matcher = re.compile("__version__ = .*")
    _replace_version(VERSION_PATH, py_version_matcher, f'__version__ = "{version}"')
    setup_py_matcher = re.compile('"version": ".*"')
    _replace_version(ROOT_DIR / "setup.py", setup_py_matcher, f'"version": "{version}"')


def _replace_version(filepath, matcher, version):
    content = filepath.open().read()
    with open(filepath, "w") as out:
        out.write(matcher.sub(version, content))
