"""Setup file for semfabric."""

from setuptools import setup, find_packages

setup(
    name="semfabric",
    version="0.4.0",
    packages=find_packages(include=["semfabric", "semfabric.*"]),
    python_requires=">=3.9",
    install_requires=[
        "anthropic>=0.39.0",
        "beautifulsoup4>=4.12.0",
        "flask>=2.3.0",
        "httpx>=0.25.0",
        "numpy>=1.24.0",
        "pandas>=1.5.0",
        "pydantic>=2.5.0",
        "python-dotenv>=1.0.0",
    ],
    entry_points={
        "console_scripts": [
            "semfabric=semfabric.cli:main",
        ],
    },
)
