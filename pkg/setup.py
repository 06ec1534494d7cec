from setuptools import setup, find_packages

setup(
    name="nlgnn",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy",
        "scipy>=1.8",
        "rich",
    ],
    extras_require={
        "tests": ["pytest"],
    },
    entry_points={
        'console_scripts': [
            'nlgnn=nlgnn.cli:main',
        ],
    },
    author="Your Name",
    description="Non-local Graph Neural Network toolkit",
)
