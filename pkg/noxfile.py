from __future__ import annotations

import os
from pathlib import Path

import nox

nox.options.default_venv_backend = "uv|virtualenv"
nox.options.reuse_existing_virtualenvs = True

PY310 = "3.10"
PY311 = "3.11"
PY312 = "3.12"
PY313 = "3.13"
PY314 = "3.14"
PY_VERSIONS = [PY310, PY311, PY312, PY313, PY314]
PY_DEFAULT = PY_VERSIONS[0]
PY_LATEST = PY_VERSIONS[-1]


def pytest_command(session: nox.Session, *extra: str) -> list[str]:
    command = ["python", "-m", "pytest", *extra]
    for arg in session.posargs:
        command.extend(arg.split(" "))
    return command


@nox.session
def test(session):
    session.notify(f"tests-{PY_DEFAULT}")


@nox.session(python=PY_VERSIONS)
def tests(session):
    session.run_install(
        "uv",
        "sync",
        "--inexact",
        "--python",
        session.python,
        env={"UV_PROJECT_ENVIRONMENT": session.virtualenv.location},
    )
    session.run(*pytest_command(session))


@nox.session
def fast(session):
    """Everything except the acceptance-scale runs."""
    session.run_install(
        "uv",
        "sync",
        "--python",
        PY_DEFAULT,
        env={"UV_PROJECT_ENVIRONMENT": session.virtualenv.location},
    )
    session.run(*pytest_command(session, "-m", "not slow"))


@nox.session
def coverage(session):
    session.run_install(
        "uv",
        "sync",
        "--python",
        PY_DEFAULT,
        env={"UV_PROJECT_ENVIRONMENT": session.virtualenv.location},
    )

    try:
        session.run(*pytest_command(session, "--cov", "--cov-report="))
    finally:
        # 0 -> OK
        # 2 -> code coverage percent unmet
        success_codes = [0, 2]

        report_cmd = ["python", "-m", "coverage", "report", "--show-missing"]
        session.run(*report_cmd, success_codes=success_codes)

        if summary := os.getenv("GITHUB_STEP_SUMMARY"):
            report_cmd.extend(["--skip-covered", "--skip-empty", "--format=markdown"])

            with Path(summary).open("a") as output_buffer:
                output_buffer.write("")
                output_buffer.write("### Coverage\n\n")
                output_buffer.flush()
                session.run(
                    *report_cmd, stdout=output_buffer, success_codes=success_codes
                )
        else:
            session.run(
                "python",
                "-m",
                "coverage",
                "html",
                "--skip-covered",
                "--skip-empty",
                success_codes=success_codes,
            )


@nox.session
def types(session):
    session.run_install(
        "uv",
        "sync",
        "--group",
        "types",
        "--python",
        PY_LATEST,
        env={"UV_PROJECT_ENVIRONMENT": session.virtualenv.location},
    )

    command = ["python", "-m", "mypy", "src"]
    command.extend(arg for arg in session.posargs if arg)
    session.run(*command)


@nox.session
def lint(session):
    session.run("uv", "run", "--python", PY_LATEST, "ruff", "check", ".")
    session.run("uv", "run", "--python", PY_LATEST, "ruff", "format", "--check", ".")


@nox.session
def verify(session):
    """Run the invariant suite through the command line."""
    session.run_install(
        "uv",
        "sync",
        "--python",
        PY_DEFAULT,
        env={"UV_PROJECT_ENVIRONMENT": session.virtualenv.location},
    )
    session.run("python", "-m", "group_automata", "verify", *session.posargs)
