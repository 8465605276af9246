import setuptools

with open('README.md', 'r') as fh:
    long_description = fh.read()

with open('requirements/runtime.txt', 'r') as fr:
    requirements = fr.readlines()

setuptools.setup(
    name='equistream',
    version='0.1.0',
    description='Streaming equivariant attention kernels: axis-aligned tensor products and online-softmax aggregation',
    long_description=long_description,
    long_description_content_type='text/markdown',
    packages=setuptools.find_packages(include=['equistream*']),
    classifiers=[
        'Programming Language :: Python :: 3',
        'Operating System :: OS Independent',
    ],
    install_requires=[i.strip() for i in requirements if i.strip()],
    entry_points={'console_scripts': ['equistream=equistream.cli:main']},
    python_requires='>=3.10',
)
