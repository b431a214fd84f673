# Copyright (c) 2026 fedda contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

from setuptools import setup, find_packages


def get_version():
    #: fedda/__init__.py needs numpy, so read the version file directly.
    scope = {}
    with open("fedda/globals.py", encoding="utf-8") as f:
        exec(f.read(), scope)

    return ".".join([str(x) for x in scope["version"]])


def get_long_description():
    with open("README.md", encoding="utf-8") as f:
        readme = f.read()

    return readme

install_requires = [
    'numpy>=1.22',
    'scipy>=1.8',
    'loguru>=0.5.3'
]

extras_require = {
    'test': 'pytest>=7.0'
}

setup(

    name="fedda",
    description="Federated segmentation with feature-level domain alignment, simulated at desk scale",
    long_description=get_long_description(),
    long_description_content_type='text/markdown',
    author = 'fedda contributors',
    license = 'MIT',
    version = get_version(),
    python_requires='>=3.8',
    packages = [p for p in find_packages() if 'test' not in p],
    install_requires=install_requires,
    extras_require=extras_require,
    entry_points={
        'console_scripts': ['fedda=fedda.cli:main']
    }

)
