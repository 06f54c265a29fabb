from setuptools import setup, find_packages
from os import path

here = path.abspath(path.dirname(__file__))

# get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read()

numpy_version = '>=1.17,!=1.17.0'

setup(
    # metadata
    name='mutdet',
    description='Mutually enhanced pre-training of oriented object detectors',
    long_description=long_description,
    long_description_content_type='text/markdown',
    keywords='object-detection pre-training remote-sensing oriented-boxes detr',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Operating System :: Microsoft :: Windows :: Windows 10',
        'Operating System :: MacOS :: MacOS X',
        'Operating System :: Unix',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
        'Topic :: Scientific/Engineering :: Image Recognition'
    ],
    # module
    packages=find_packages(exclude=['docs', 'tests']),
    python_requires='>=3.7',
    use_scm_version={
        'write_to': 'mutdet/_version.py',
        'fallback_version': '0.0.0'
    },
    # dependencies
    setup_requires=[
        'setuptools_scm',
        'setuptools_scm_git_archive',
        'numpy%s' % numpy_version
    ],
    install_requires=[
        'cachetools>=3.1.0',
        'click',
        'click-spinner',
        'marshmallow>=3.0.0',
        'numpy%s' % numpy_version,
        'pillow',
        'scikit-learn>=1.0',
        'scipy>=1.7',
        'shapely',
        'toml',
        'tqdm'
    ],
    extras_require={
        'test': [
            'pytest',
            'pytest-cov',
            'pytest-mypy',
            'pytest-flake8',
            'pytest-benchmark',
            'colorlog',
            'flake8'
        ],
        'docs': [
            'sphinx',
            'sphinx_autodoc_typehints',
            'sphinx-click'
        ],
        'recommended': [
            'colorlog'
        ]
    },
    # CLI
    entry_points='''
        [console_scripts]
        mutdet=mutdet.scripts.cli:entrypoint
    ''',
)
