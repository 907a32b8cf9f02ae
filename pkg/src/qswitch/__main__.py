from qswitch.cli import main

main()
