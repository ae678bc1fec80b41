from setuptools import setup, find_packages

setup(
    name="expdd",  # the name used on PyPI and pip
    version="0.1.0",
    description="Exponential divided differences with sharp bounds, inequality sweeps and identity self-tests",
    author="Dev Mad",
    author_email="maddev@example.com",
    packages=find_packages(exclude=["tests"]),
    include_package_data=True,
    package_data={
        'exp_divdiff': ['battery.json'],
    },
    install_requires=[
        "fire",
        "pyfiglet",
        "pytz",
        "tabulate",
        "rich",
        "peewee",
        "pytest",
        "python-dateutil",
        "numpy",
        "mpmath",
        "hypothesis"
    ],
    entry_points={
        "console_scripts": [
            "expdd=exp_divdiff.main:main",
        ]
    },
    python_requires=">=3.9",
)
