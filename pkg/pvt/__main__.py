from pvt.cli import main

main()
