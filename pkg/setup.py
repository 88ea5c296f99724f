from setuptools import setup, find_packages

setup(
    name="rci-secrecy",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "python-dotenv",
        "fastapi>=0.104.1",
        "uvicorn[standard]>=0.24.0",
        "pydantic>=2.5.0",
        "PyYAML",
    ],
    extras_require={
        "dev": [
            "pytest",
            "pytest-cov",
            "httpx",
            "black",
            "mypy",
        ],
        "plot": [
            "matplotlib",
        ],
    },
    entry_points={
        "console_scripts": [
            "rci-secrecy=services.src.cli.cli:main",
        ],
    },
)
