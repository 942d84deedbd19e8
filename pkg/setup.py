from pathlib import Path
from typing import List

from setuptools import find_packages, setup


VERSION = '0.2.0'


def get_requirements(req_file: str) -> List[str]:
    """
    Extract runtime requirements from provided file, skipping test tooling.
    """
    req_path = Path(req_file)
    lines = req_path.read_text().split("\n") if req_path.exists() else []
    return [line for line in lines if line and not line.startswith(('pytest', 'setuptools'))]


def get_long_description(readme_file: str) -> str:
    """
    Extract README from provided file.
    """
    readme_path = Path(readme_file)
    long_description = (
        readme_path.read_text(encoding="utf-8") if readme_path.exists() else ""
    )
    return long_description


setup(
    name='ptsafe',
    version=VERSION,
    packages=find_packages(exclude=['ptsafe.tests']),
    install_requires=get_requirements('requirements.txt'),
    extras_require={'test': ['pytest>=7.0']},
    entry_points={'console_scripts': ['ptsafe=ptsafe.cli:main']},
    python_requires='>=3.8',
    url='',
    license='MIT',
    author='ptsafe developers',
    author_email='',
    description='Prescribed-time safety filters for chains of integrators',
    long_description=get_long_description('README.md'),
    long_description_content_type='text/markdown',
)
